#pragma once

// Text geolocation with blended presence-bits string kernels: corpus
// handling, kernel construction, nu-SVR on precomputed Gram matrices,
// boosted-tree stacking, and the task's evaluation metrics.

#include "geokern/bundle.hpp"
#include "geokern/common.hpp"
#include "geokern/corpus.hpp"
#include "geokern/gbt.hpp"
#include "geokern/geoeval.hpp"
#include "geokern/nu_svr.hpp"
#include "geokern/stacking.hpp"
#include "geokern/string_kernel.hpp"
#include "geokern/svg_plot.hpp"
#include "geokern/synth.hpp"
