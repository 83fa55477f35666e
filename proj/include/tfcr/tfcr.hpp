#pragma once

#include "tfcr/classifier.hpp"
#include "tfcr/corpus.hpp"
#include "tfcr/embed.hpp"
#include "tfcr/harness.hpp"
#include "tfcr/metrics.hpp"
#include "tfcr/random.hpp"
#include "tfcr/repr.hpp"
#include "tfcr/tokenize.hpp"
#include "tfcr/util.hpp"
#include "tfcr/version.hpp"
#include "tfcr/weights.hpp"
