#pragma once

#include "relfix/errors.hpp"
#include "relfix/fixed_point.hpp"
#include "relfix/fixtures.hpp"
#include "relfix/format.hpp"
#include "relfix/fractional.hpp"
#include "relfix/hypothesis.hpp"
#include "relfix/relation.hpp"
#include "relfix/space.hpp"
#include "relfix/w_distance.hpp"
