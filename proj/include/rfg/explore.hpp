#pragma once

#include "rfg/explore/diversity.hpp"
#include "rfg/explore/replay.hpp"
#include "rfg/explore/rnd.hpp"
