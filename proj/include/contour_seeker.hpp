#ifndef CONTOUR_SEEKER_HPP
#define CONTOUR_SEEKER_HPP

#include "contour_seeker/acquisition.hpp"
#include "contour_seeker/bench.hpp"
#include "contour_seeker/design_space.hpp"
#include "contour_seeker/engine.hpp"
#include "contour_seeker/errors.hpp"
#include "contour_seeker/ezgp.hpp"
#include "contour_seeker/io.hpp"
#include "contour_seeker/seeding.hpp"

#endif  // CONTOUR_SEEKER_HPP
