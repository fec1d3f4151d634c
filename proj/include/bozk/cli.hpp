#pragma once

// Configuration-driven batch runs: solve / evolve / kernel / classify /
// sweep-dc / stability.  One JSON document in, JSON/CSV/field artifacts out,
// exit codes 0 (ok), 2 (invalid config), 3 (regime violation),
// 4 (non-convergence).

#include <atomic>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <thread>

#include <json.hpp>

#include "bozk/evolve.hpp"
#include "bozk/field_io.hpp"
#include "bozk/kernel.hpp"
#include "bozk/solver.hpp"
#include "bozk/version.hpp"

namespace bozk {

namespace fs = std::filesystem;
using nlohmann::json;

struct RunConfig {
  std::string command;
  Params params;
  std::optional<Grid2D> grid;
  SolveOptions solve;
  double dt = 1e-3;
  double t_end = 5.0;
  std::string dealias = "two_thirds";
  int snapshot_stride = 0;
  int record_stride = 0;
  std::string initial_field;  // evolve: start from this file instead of a solve
  bool track_reference = true;
  double perturbation = 0.01;
  std::vector<double> c_values;
  std::uint64_t seed = 0;
  fs::path out_dir = "out";
  bool force = false;
  int jobs = 1;
  json raw;
};

inline RunConfig parse_config(const json& doc) {
  RunConfig cfg;
  cfg.raw = doc;
  cfg.command = doc.at("command").get<std::string>();
  static const char* known[] = {"solve",    "evolve",  "kernel",
                                "classify", "sweep-dc", "stability"};
  if (std::find_if(std::begin(known), std::end(known), [&](const char* k) {
        return cfg.command == k;
      }) == std::end(known))
    throw contract_error("config: unknown command '" + cfg.command + "'");

  cfg.params = params_from_json(doc.at("params"));
  cfg.params.validate();

  if (doc.contains("grid")) {
    const json& g = doc["grid"];
    cfg.grid = Grid2D(g.at("nx").get<int>(), g.at("ny").get<int>(),
                      g.at("lx").get<double>(), g.at("ly").get<double>());
  }
  if (doc.contains("solver")) {
    const json& s = doc["solver"];
    cfg.solve.tol = s.value("tol", cfg.solve.tol);
    cfg.solve.max_iter = s.value("max_iter", cfg.solve.max_iter);
    cfg.solve.gamma = s.value("gamma", cfg.solve.gamma);
  }
  if (doc.contains("evolve")) {
    const json& e = doc["evolve"];
    cfg.dt = e.value("dt", cfg.dt);
    cfg.t_end = e.value("t_end", cfg.t_end);
    cfg.dealias = e.value("dealias", cfg.dealias);
    cfg.snapshot_stride = e.value("snapshot_stride", cfg.snapshot_stride);
    cfg.record_stride = e.value("record_stride", cfg.record_stride);
    cfg.initial_field = e.value("initial_field", cfg.initial_field);
    cfg.track_reference = e.value("track_reference", cfg.track_reference);
    if (cfg.dealias != "two_thirds" && cfg.dealias != "zero_pad")
      throw contract_error("config: dealias must be two_thirds or zero_pad");
  }
  if (doc.contains("stability"))
    cfg.perturbation = doc["stability"].value("perturbation", cfg.perturbation);
  if (doc.contains("c_values"))
    cfg.c_values = doc["c_values"].get<std::vector<double>>();
  cfg.seed = doc.value("seed", std::uint64_t(0));
  if (doc.contains("out")) cfg.out_dir = doc["out"].get<std::string>();

  bool needs_grid = cfg.command != "classify";
  if (needs_grid && !cfg.grid)
    throw contract_error("config: command '" + cfg.command + "' needs a grid");
  if (cfg.command == "sweep-dc" && cfg.c_values.empty())
    throw contract_error("config: sweep-dc needs c_values");
  return cfg;
}

inline RunConfig parse_config_file(const fs::path& p) {
  std::ifstream is(p);
  if (!is) throw contract_error("config: cannot open " + p.string());
  json doc = json::parse(is);
  return parse_config(doc);
}

namespace detail {

inline std::uint64_t fnv1a(const std::string& s) {
  std::uint64_t h = 1469598103934665603ull;
  for (unsigned char c : s) {
    h ^= c;
    h *= 1099511628211ull;
  }
  return h;
}

inline void write_json(const fs::path& p, const json& j) {
  std::ofstream os(p);
  os << j.dump(2) << '\n';
}

inline void write_manifest(const RunConfig& cfg) {
  char hex[32];
  std::snprintf(hex, sizeof hex, "%016llx",
                static_cast<unsigned long long>(fnv1a(cfg.raw.dump())));
  json versions = {{"bozk", BOZK_VERSION}, {"fftw", std::string(fftw_version)}};
  json m = {{"config_hash", hex},
            {"seed", cfg.seed},
            {"command", cfg.command},
            {"config", cfg.raw},
            {"versions", versions}};
  write_json(cfg.out_dir / "manifest.json", m);
}

inline json evolve_summary(const EvolveReport& r) {
  json j;
  j["dt"] = r.dt;
  j["steps"] = r.steps;
  j["dealias"] = r.dealias_rule;
  j["aborted"] = r.aborted;
  if (r.aborted) j["abort_reason"] = r.abort_reason;
  double mm = 0, em = 0, od = 0;
  for (double v : r.mass_drift) mm = std::max(mm, v);
  for (double v : r.energy_drift) em = std::max(em, v);
  for (double v : r.orbital_distance) od = std::max(od, v);
  j["max_mass_drift"] = mm;
  j["max_energy_drift"] = em;
  if (!r.orbital_distance.empty()) j["max_orbital_distance"] = od;
  return j;
}

}  // namespace detail

// Returns the process exit code; artifacts land under cfg.out_dir.
inline int run(const RunConfig& cfg) {
  fs::create_directories(cfg.out_dir);
  detail::write_manifest(cfg);

  auto fail = [&](int code, const std::string& kind, const std::string& what) {
    detail::write_json(cfg.out_dir / "error.json",
                       json{{"error", kind}, {"what", what}});
    std::cerr << "bozk: " << what << '\n';
    return code;
  };

  try {
    if (cfg.command == "classify") {
      Classification cls = classify(cfg.params);
      json j = {{"verdict", verdict_name(cls.verdict)},
                {"matched_case", cls.matched_case}};
      detail::write_json(cfg.out_dir / "classification.json", j);
      std::cout << j.dump() << '\n';
      return 0;
    }

    const Grid2D& g = *cfg.grid;

    auto gated_solve = [&](const Params& q) {
      Classification cls = classify(q);
      if (cls.verdict != Verdict::Exists && !cfg.force)
        throw regime_error("regime gate: classification is " +
                           std::string(verdict_name(cls.verdict)) + " (" +
                           cls.matched_case + "); pass --force to override");
      SolveOptions o = cfg.solve;
      o.override_regime = cfg.force;
      return petviashvili_solve(q, g, o);
    };

    if (cfg.command == "solve") {
      SolitaryWave w = gated_solve(cfg.params);
      detail::write_json(cfg.out_dir / "wave.json", to_json(w));
      write_field(cfg.out_dir / "profile.bozk", w.profile, cfg.params);
      if (!w.converged)
        return fail(4, "non-convergence",
                    "solver did not converge; diagnostics written");
      return 0;
    }

    if (cfg.command == "kernel") {
      KernelSpec spec(cfg.params);
      Field K = kernel_field(spec, g);
      write_field(cfg.out_dir / "kernel.bozk", K, cfg.params);
      KernelDecayFit fit = kernel_decay_fit(spec, g);
      detail::write_json(cfg.out_dir / "kernel.json",
                         json{{"slope_y_exp", fit.slope_y_exp},
                              {"slope_x_alg", fit.slope_x_alg},
                              {"params", params_to_json(cfg.params)}});
      return 0;
    }

    if (cfg.command == "evolve") {
      Field u0(g);
      std::optional<Field> reference;
      if (!cfg.initial_field.empty()) {
        auto [f, fq] = read_field(cfg.initial_field);
        (void)fq;
        if (!(f.grid == g))
          throw contract_error("evolve: initial field grid differs from config grid");
        u0 = f;
      } else {
        SolitaryWave w = gated_solve(cfg.params);
        detail::write_json(cfg.out_dir / "wave.json", to_json(w));
        u0 = w.profile;
        if (cfg.track_reference) reference = w.profile;
      }
      EvolveOptions opts;
      opts.dealias = cfg.dealias == "zero_pad" ? Dealias::zero_pad
                                               : Dealias::two_thirds;
      opts.record_stride = cfg.record_stride;
      if (reference) opts.reference = &*reference;
      std::atomic<int> snap_idx{0};
      if (cfg.snapshot_stride > 0) {
        fs::create_directories(cfg.out_dir / "snapshots");
        opts.snapshot_stride = cfg.snapshot_stride;
        opts.snapshot_sink = [&](double, const Field& f) {
          char name[32];
          std::snprintf(name, sizeof name, "u_%06d.bozk", snap_idx++);
          write_field(cfg.out_dir / "snapshots" / name, f, cfg.params);
        };
      }
      EvolveReport rep = evolve(u0, cfg.params, cfg.dt, cfg.t_end, opts);
      {
        std::ofstream os(cfg.out_dir / "series.csv");
        write_series_csv(os, rep);
      }
      write_field(cfg.out_dir / "final.bozk", rep.final_field, cfg.params);
      detail::write_json(cfg.out_dir / "evolve.json", detail::evolve_summary(rep));
      if (rep.aborted)
        return fail(4, "aborted", "evolution aborted: " + rep.abort_reason);
      return 0;
    }

    if (cfg.command == "stability") {
      SolitaryWave w = gated_solve(cfg.params);
      detail::write_json(cfg.out_dir / "wave.json", to_json(w));
      if (!w.converged)
        return fail(4, "non-convergence", "reference wave did not converge");
      EvolveOptions opts;
      opts.record_stride = cfg.record_stride;
      EvolveReport rep = stability_experiment(w.profile, cfg.params,
                                              cfg.perturbation, cfg.t_end,
                                              cfg.dt, cfg.seed, opts);
      {
        std::ofstream os(cfg.out_dir / "series.csv");
        write_series_csv(os, rep);
      }
      json j = detail::evolve_summary(rep);
      j["perturbation"] = cfg.perturbation;
      j["znorm_reference"] = znorm(w.profile);
      if (!rep.orbital_distance.empty() && rep.orbital_distance.front() > 0.0)
        j["distance_ratio"] =
            *std::max_element(rep.orbital_distance.begin(),
                              rep.orbital_distance.end()) /
            rep.orbital_distance.front();
      detail::write_json(cfg.out_dir / "stability.json", j);
      if (rep.aborted)
        return fail(4, "aborted", "evolution aborted: " + rep.abort_reason);
      return 0;
    }

    if (cfg.command == "sweep-dc") {
      struct Job {
        double c;
        json wave;
        double d = 0.0;
        bool ok = false;
        std::string what;
      };
      std::vector<Job> jobs(cfg.c_values.size());
      for (std::size_t i = 0; i < jobs.size(); ++i) jobs[i].c = cfg.c_values[i];

      std::atomic<std::size_t> next{0};
      auto worker = [&] {
        for (;;) {
          std::size_t i = next.fetch_add(1);
          if (i >= jobs.size()) return;
          Job& jb = jobs[i];
          try {
            Params q = cfg.params;
            q.c = jb.c;
            SolitaryWave w = gated_solve(q);
            char sub[32];
            std::snprintf(sub, sizeof sub, "c_%g", jb.c);
            fs::path dir = cfg.out_dir / sub;
            fs::create_directories(dir);
            detail::write_json(dir / "wave.json", to_json(w));
            write_field(dir / "profile.bozk", w.profile, q);
            if (!w.converged) {
              jb.what = "no convergence";
              continue;
            }
            jb.d = w.functional_report.action;
            jb.ok = true;
          } catch (const std::exception& e) {
            jb.what = e.what();
          }
        }
      };
      int nthreads = std::max(1, cfg.jobs);
      std::vector<std::thread> pool;
      for (int t = 1; t < nthreads; ++t) pool.emplace_back(worker);
      worker();
      for (auto& t : pool) t.join();

      {
        std::ofstream os(cfg.out_dir / "dc.csv");
        os << "c,d\n";
        for (const Job& jb : jobs)
          if (jb.ok) os << jb.c << ',' << jb.d << '\n';
      }
      json summary;
      summary["c_values"] = cfg.c_values;
      std::vector<double> lc, ld;
      for (const Job& jb : jobs)
        if (jb.ok && jb.d > 0.0) {
          lc.push_back(std::log(jb.c));
          ld.push_back(std::log(jb.d));
        }
      if (lc.size() >= 2) {
        summary["loglog_slope"] = linear_fit(lc, ld).first;
        summary["slope_theory"] = 2.0 / cfg.params.p - 0.5;
      }
      bool all_ok = true;
      for (const Job& jb : jobs) {
        if (!jb.ok) {
          all_ok = false;
          summary["failures"].push_back({{"c", jb.c}, {"what", jb.what}});
        }
      }
      detail::write_json(cfg.out_dir / "summary.json", summary);
      if (!all_ok) return fail(4, "non-convergence", "some sweep jobs failed");
      return 0;
    }

    throw contract_error("unhandled command " + cfg.command);
  } catch (const regime_error& e) {
    return fail(3, "regime", e.what());
  } catch (const contract_error& e) {
    return fail(2, "invalid", e.what());
  } catch (const field_io_error& e) {
    return fail(2, "io", e.what());
  } catch (const std::exception& e) {
    return fail(4, "runtime", e.what());
  }
}

}  // namespace bozk
