#pragma once

#include "ndgyro/analysis/allan.hpp"
#include "ndgyro/analysis/calibration.hpp"
#include "ndgyro/analysis/fit.hpp"
#include "ndgyro/analysis/spectrum.hpp"
#include "ndgyro/analysis/working_point.hpp"
#include "ndgyro/config.hpp"
#include "ndgyro/detector.hpp"
#include "ndgyro/errors.hpp"
#include "ndgyro/rate_table.hpp"
#include "ndgyro/sequence.hpp"
#include "ndgyro/series.hpp"
#include "ndgyro/spin.hpp"
#include "ndgyro/units.hpp"
