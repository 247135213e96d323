#pragma once

// Umbrella header for the crisp inverse-kinematics toolkit.

#include "crisp/boxopt.hpp"
#include "crisp/dataset.hpp"
#include "crisp/dls.hpp"
#include "crisp/errors.hpp"
#include "crisp/estimator.hpp"
#include "crisp/kernel.hpp"
#include "crisp/kinematics.hpp"
#include "crisp/loss.hpp"
#include "crisp/tracking.hpp"
#include "crisp/trajectory.hpp"
#include "crisp/util.hpp"
