#pragma once

// Umbrella header.

#include "recode/bits.hpp"
#include "recode/codec.hpp"
#include "recode/container.hpp"
#include "recode/dither.hpp"
#include "recode/error.hpp"
#include "recode/harness.hpp"
#include "recode/models.hpp"
#include "recode/random.hpp"
#include "recode/selection.hpp"
#include "recode/sfe.hpp"
#include "recode/smsu.hpp"
#include "recode/stats.hpp"
#include "recode/universal.hpp"
