#ifndef UIND_UIND_HPP
#define UIND_UIND_HPP

#include "uind/bits.hpp"
#include "uind/cache.hpp"
#include "uind/coding.hpp"
#include "uind/dyadic.hpp"
#include "uind/enumeration.hpp"
#include "uind/environments.hpp"
#include "uind/free_energy.hpp"
#include "uind/induction.hpp"
#include "uind/measure.hpp"
#include "uind/parallel.hpp"
#include "uind/reduction.hpp"
#include "uind/refmachine.hpp"
#include "uind/report.hpp"
#include "uind/rng.hpp"

#endif
