#pragma once

// Everything in one include.

#include "hardykit/admissibility.hpp"
#include "hardykit/errors.hpp"
#include "hardykit/functionals.hpp"
#include "hardykit/logspace.hpp"
#include "hardykit/parallel.hpp"
#include "hardykit/quad.hpp"
#include "hardykit/radial.hpp"
#include "hardykit/space.hpp"
#include "hardykit/supremum.hpp"
#include "hardykit/verifier.hpp"
#include "hardykit/wexpr.hpp"
