#pragma once

// Umbrella header for the nlglrt library.

#include "nlglrt/errors.hpp"
#include "nlglrt/rng.hpp"
#include "nlglrt/complex_matrix.hpp"
#include "nlglrt/signal.hpp"
#include "nlglrt/detector.hpp"
#include "nlglrt/classifier.hpp"
#include "nlglrt/evaluation.hpp"
#include "nlglrt/sha256.hpp"
#include "nlglrt/io.hpp"
#include "nlglrt/run_config.hpp"
#include "nlglrt/workflow.hpp"
