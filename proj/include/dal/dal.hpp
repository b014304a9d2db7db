#pragma once

#include "dal/acquisition.hpp"
#include "dal/baselines.hpp"
#include "dal/config.hpp"
#include "dal/dal_core.hpp"
#include "dal/dataset.hpp"
#include "dal/error.hpp"
#include "dal/experiment.hpp"
#include "dal/generator.hpp"
#include "dal/learner.hpp"
#include "dal/numerics.hpp"
#include "dal/report.hpp"
