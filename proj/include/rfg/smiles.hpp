#pragma once

#include "rfg/smiles/descriptors.hpp"
#include "rfg/smiles/fingerprint.hpp"
#include "rfg/smiles/tokenizer.hpp"
#include "rfg/smiles/validator.hpp"
#include "rfg/smiles/vocabulary.hpp"
