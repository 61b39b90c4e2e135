#pragma once

#include "rfg/tasks/rewards.hpp"
#include "rfg/tasks/run.hpp"
