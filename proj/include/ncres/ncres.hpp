#pragma once

// Umbrella header.

#include "ncres/core.hpp"
#include "ncres/symbol.hpp"
#include "ncres/symbol_text.hpp"
#include "ncres/rational.hpp"
#include "ncres/halfline.hpp"
#include "ncres/residue.hpp"
#include "ncres/spectral.hpp"
#include "ncres/heatzeta.hpp"
#include "ncres/parametric.hpp"
