#pragma once

#include "besov_invert/errors.hpp"
#include "besov_invert/rng.hpp"
#include "besov_invert/daubechies.hpp"
#include "besov_invert/field.hpp"
#include "besov_invert/wavelet.hpp"
#include "besov_invert/fourier.hpp"
#include "besov_invert/stats.hpp"
#include "besov_invert/field_io.hpp"
#include "besov_invert/besov.hpp"
#include "besov_invert/projection.hpp"
#include "besov_invert/forward.hpp"
#include "besov_invert/linalg.hpp"
#include "besov_invert/posterior.hpp"
#include "besov_invert/quadrature.hpp"
#include "besov_invert/work_pool.hpp"
#include "besov_invert/mcmc.hpp"
#include "besov_invert/experiments.hpp"
#include "besov_invert/report_io.hpp"
#include "besov_invert/config.hpp"
#include "besov_invert/cli.hpp"
