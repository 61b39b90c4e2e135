#pragma once

#include "rfg/metrics/metrics.hpp"
#include "rfg/metrics/runlog.hpp"
