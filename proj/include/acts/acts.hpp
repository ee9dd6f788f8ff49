#pragma once

// Umbrella header for the ACTS toolkit: a geometry-based, instance-specific
// adversarial robustness metric for dense feed-forward classifiers, the
// white-box attacks (FGSM/BIM/PGD) that probe it, and the evaluation harness
// that validates it (Overlap%, attack flips, mean-ACTS ranking).

#include "acts/andgate.hpp"
#include "acts/attacks.hpp"
#include "acts/common.hpp"
#include "acts/data_io.hpp"
#include "acts/evaluate.hpp"
#include "acts/linalg.hpp"
#include "acts/metric.hpp"
#include "acts/network.hpp"
#include "acts/train.hpp"
