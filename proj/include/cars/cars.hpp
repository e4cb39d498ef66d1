#pragma once

#include "cars/adjudication.hpp"
#include "cars/excitation.hpp"
#include "cars/fisher.hpp"
#include "cars/montecarlo.hpp"
#include "cars/numerics/differentiation.hpp"
#include "cars/numerics/optimize.hpp"
#include "cars/numerics/quadrature.hpp"
#include "cars/numerics/series.hpp"
#include "cars/numerics/special.hpp"
#include "cars/parallel.hpp"
#include "cars/psf_modes.hpp"
#include "cars/spectral.hpp"
#include "cars/version.hpp"
