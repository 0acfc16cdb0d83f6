#pragma once

#include "extremal/error.hpp"
#include "extremal/scaled.hpp"
#include "extremal/grid.hpp"
#include "extremal/profile.hpp"
#include "extremal/quadrature.hpp"
#include "extremal/radial_ops.hpp"
#include "extremal/ode.hpp"
#include "extremal/power_law.hpp"
#include "extremal/smooth_segment.hpp"
#include "extremal/potentials.hpp"
#include "extremal/oscillatory.hpp"
#include "extremal/linear_ode.hpp"
#include "extremal/reconstruction.hpp"
#include "extremal/branch.hpp"
#include "extremal/verification.hpp"
#include "extremal/io.hpp"
