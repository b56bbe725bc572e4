#pragma once

#include "reversal_lab/classical.hpp"
#include "reversal_lab/errors.hpp"
#include "reversal_lab/friend.hpp"
#include "reversal_lab/info.hpp"
#include "reversal_lab/measurement.hpp"
#include "reversal_lab/repeatability.hpp"
#include "reversal_lab/scenario.hpp"
#include "reversal_lab/states.hpp"
#include "reversal_lab/tensor.hpp"
