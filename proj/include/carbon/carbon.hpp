#pragma once

#include "carbon/builtin_cases.hpp"
#include "carbon/case_io.hpp"
#include "carbon/cef.hpp"
#include "carbon/clearing.hpp"
#include "carbon/emission.hpp"
#include "carbon/errors.hpp"
#include "carbon/grid.hpp"
#include "carbon/sensitivity.hpp"
#include "carbon/simplex.hpp"
#include "carbon/svd.hpp"
#include "carbon/report.hpp"
#include "carbon/pipeline.hpp"
