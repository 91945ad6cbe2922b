#pragma once

// Umbrella header.
#include "mcq/distractor.hpp"
#include "mcq/divergence.hpp"
#include "mcq/error.hpp"
#include "mcq/item_bank.hpp"
#include "mcq/numeric.hpp"
#include "mcq/readability.hpp"
#include "mcq/report.hpp"
#include "mcq/reshape.hpp"
#include "mcq/synthetic.hpp"
