#pragma once

#include "rcpsp/error.hpp"
#include "rcpsp/experiment.hpp"
#include "rcpsp/ga.hpp"
#include "rcpsp/instance_io.hpp"
#include "rcpsp/operators.hpp"
#include "rcpsp/oracle.hpp"
#include "rcpsp/population.hpp"
#include "rcpsp/project_model.hpp"
#include "rcpsp/random.hpp"
#include "rcpsp/schedule.hpp"
