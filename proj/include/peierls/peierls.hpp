#pragma once

#include "peierls/cluster_geometry.hpp"
#include "peierls/contour_enumeration.hpp"
#include "peierls/errors.hpp"
#include "peierls/lattice.hpp"
#include "peierls/monte_carlo.hpp"
#include "peierls/parallel.hpp"
#include "peierls/peierls_bounds.hpp"
