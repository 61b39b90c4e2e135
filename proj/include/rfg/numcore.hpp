#pragma once

#include "rfg/numcore/adam.hpp"
#include "rfg/numcore/autograd.hpp"
#include "rfg/numcore/ops.hpp"
#include "rfg/numcore/tensor.hpp"
#include "rfg/numcore/random.hpp"
