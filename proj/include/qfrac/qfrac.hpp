#pragma once

#include "qfrac/error.hpp"
#include "qfrac/qcore.hpp"
#include "qfrac/quadrature.hpp"
#include "qfrac/qhermite.hpp"
#include "qfrac/awop.hpp"
#include "qfrac/semigroups.hpp"
#include "qfrac/awpoly.hpp"
#include "qfrac/transforms.hpp"
#include "qfrac/dualeq.hpp"
#include "qfrac/verify.hpp"
