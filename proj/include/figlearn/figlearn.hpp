#pragma once

// Joint inference of a graph Laplacian and its generating spectral filter
// from signal observations, by minimizing the closed-form 2-Wasserstein
// distance between the empirical signal Gaussian and the filtered-white-
// noise model, plus missing-value inference through the learned filter.

#include "figlearn/adam.hpp"
#include "figlearn/bench.hpp"
#include "figlearn/eig.hpp"
#include "figlearn/errors.hpp"
#include "figlearn/filter.hpp"
#include "figlearn/graph.hpp"
#include "figlearn/infer.hpp"
#include "figlearn/io.hpp"
#include "figlearn/learn.hpp"
#include "figlearn/loss.hpp"
#include "figlearn/matrix.hpp"
#include "figlearn/rng.hpp"
#include "figlearn/sbm.hpp"
#include "figlearn/stats.hpp"
