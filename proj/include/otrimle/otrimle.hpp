// Umbrella header.
#pragma once

#include "otrimle/ari.hpp"
#include "otrimle/baseline.hpp"
#include "otrimle/benchmark.hpp"
#include "otrimle/bootstrap.hpp"
#include "otrimle/calibration.hpp"
#include "otrimle/constraint.hpp"
#include "otrimle/csv.hpp"
#include "otrimle/dgp.hpp"
#include "otrimle/discrepancy.hpp"
#include "otrimle/em.hpp"
#include "otrimle/fit.hpp"
#include "otrimle/gaussian.hpp"
#include "otrimle/kde.hpp"
#include "otrimle/math_util.hpp"
#include "otrimle/parallel.hpp"
#include "otrimle/quality.hpp"
#include "otrimle/report_io.hpp"
#include "otrimle/rng.hpp"
#include "otrimle/selection.hpp"
#include "otrimle/tau.hpp"
#include "otrimle/types.hpp"
