#pragma once

#include "frogsdm/balance.hpp"
#include "frogsdm/config.hpp"
#include "frogsdm/covariates.hpp"
#include "frogsdm/csv.hpp"
#include "frogsdm/ensemble.hpp"
#include "frogsdm/featsel.hpp"
#include "frogsdm/fusion.hpp"
#include "frogsdm/geo.hpp"
#include "frogsdm/metrics.hpp"
#include "frogsdm/occurrence.hpp"
#include "frogsdm/pipeline.hpp"
#include "frogsdm/pseudoabsence.hpp"
#include "frogsdm/raster.hpp"
#include "frogsdm/rng.hpp"
#include "frogsdm/svg.hpp"
#include "frogsdm/testkit.hpp"
#include "frogsdm/version.hpp"
