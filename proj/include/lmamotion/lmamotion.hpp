#pragma once

#include "core.hpp"
#include "descriptors.hpp"
#include "evaluation.hpp"
#include "feature_stats.hpp"
#include "feature_table.hpp"
#include "logistic.hpp"
#include "motion_model.hpp"
#include "optimize.hpp"
#include "random.hpp"
#include "synth.hpp"
#include "task.hpp"
