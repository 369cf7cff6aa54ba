#pragma once

// Umbrella header: RBMs with evenly spaced multilevel hidden units, exact
// small-model inference, Gibbs sampling, CD training, the discriminative
// classifier variant, and the experiment runners.

#include "mvrbm/drbm.hpp"
#include "mvrbm/experiments.hpp"
#include "mvrbm/gibbs.hpp"
#include "mvrbm/io.hpp"
#include "mvrbm/levels.hpp"
#include "mvrbm/matrix.hpp"
#include "mvrbm/metrics.hpp"
#include "mvrbm/optim.hpp"
#include "mvrbm/pair_model.hpp"
#include "mvrbm/plot.hpp"
#include "mvrbm/rbm.hpp"
#include "mvrbm/rng.hpp"
#include "mvrbm/train.hpp"
