#pragma once

#include "rfg/policy/checkpoint.hpp"
#include "rfg/policy/likelihood.hpp"
#include "rfg/policy/model.hpp"
#include "rfg/policy/pretrain.hpp"
#include "rfg/policy/sampling.hpp"
