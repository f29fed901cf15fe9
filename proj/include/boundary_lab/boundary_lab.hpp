#ifndef BOUNDARY_LAB_BOUNDARY_LAB_HPP_
#define BOUNDARY_LAB_BOUNDARY_LAB_HPP_

#include "boundary_lab/bounds.hpp"
#include "boundary_lab/envelope.hpp"
#include "boundary_lab/functionals.hpp"
#include "boundary_lab/harness.hpp"
#include "boundary_lab/lowerbound.hpp"
#include "boundary_lab/model.hpp"
#include "boundary_lab/parallel.hpp"
#include "boundary_lab/rng.hpp"
#include "boundary_lab/simulate.hpp"
#include "boundary_lab/testing.hpp"

#endif  // BOUNDARY_LAB_BOUNDARY_LAB_HPP_
