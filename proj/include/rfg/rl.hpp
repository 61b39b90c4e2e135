#pragma once

#include "rfg/rl/compose.hpp"
#include "rfg/rl/regularizers.hpp"
#include "rfg/rl/reinforce.hpp"
#include "rfg/rl/shaping.hpp"
