#pragma once

// Umbrella header.

#include "scalc/core.hpp"
#include "scalc/grid.hpp"
#include "scalc/fft.hpp"
#include "scalc/coefficients.hpp"
#include "scalc/operators.hpp"
#include "scalc/contour.hpp"
#include "scalc/calculus.hpp"
#include "scalc/analysis.hpp"
#include "scalc/samples.hpp"
#include "scalc/solvers.hpp"
#include "scalc/probes.hpp"
#include "scalc/io.hpp"
#include "scalc/config.hpp"
#include "scalc/report.hpp"
#include "scalc/checks.hpp"
#include "scalc/campaign.hpp"
