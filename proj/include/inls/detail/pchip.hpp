#pragma once

// Boost 1.74's pchip calls isnan unqualified; <math.h> puts it in the
// global namespace so lookup succeeds.
#include <math.h>

#include <boost/math/interpolators/pchip.hpp>
