#pragma once

#include "hardy/errors.hpp"
#include "hardy/weights.hpp"
#include "hardy/quadrature.hpp"
#include "hardy/discrete.hpp"
#include "hardy/transforms.hpp"
#include "hardy/functionals.hpp"
#include "hardy/inequality.hpp"
#include "hardy/solver.hpp"
#include "hardy/verify.hpp"
#include "hardy/io.hpp"
