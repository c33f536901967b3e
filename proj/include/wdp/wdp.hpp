#pragma once

// Umbrella header for the weak Dirichlet process toolkit.

#include "wdp/audit.hpp"        // kernel hypothesis audits
#include "wdp/convolution.hpp"  // martingale convolutions X = int G(t,s) dL_s
#include "wdp/decompose.hpp"    // natural decompositions and diagnostics
#include "wdp/estimators.hpp"   // S^n sums, energy, pre-QV, property (S)
#include "wdp/grid.hpp"         // subdivisions and refining sequences
#include "wdp/ito.hpp"          // transformation decompositions F(X) = Y + Gamma
#include "wdp/mc.hpp"           // reproducible ensembles and convergence tables
#include "wdp/pathology.hpp"    // appendix counterexamples
#include "wdp/rng.hpp"
#include "wdp/sample_path.hpp"
