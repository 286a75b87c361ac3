#pragma once

#include "ncwait/errors.hpp"
#include "ncwait/mdp_solver.hpp"
#include "ncwait/occupancy_lp.hpp"
#include "ncwait/policies.hpp"
#include "ncwait/relay_model.hpp"
#include "ncwait/sim_engine.hpp"
#include "ncwait/threshold_analytics.hpp"
