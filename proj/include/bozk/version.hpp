#pragma once

#define BOZK_VERSION "0.1.0"
