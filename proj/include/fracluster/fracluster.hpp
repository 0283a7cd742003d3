#pragma once

#include "fracluster/arcs.hpp"
#include "fracluster/cones.hpp"
#include "fracluster/core.hpp"
#include "fracluster/curvature.hpp"
#include "fracluster/energy.hpp"
#include "fracluster/geometry.hpp"
#include "fracluster/io.hpp"
#include "fracluster/kernel.hpp"
#include "fracluster/minimizer.hpp"
#include "fracluster/quadrature.hpp"
