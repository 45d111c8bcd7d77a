#pragma once

#include "wirerecon/bspline.hpp"
#include "wirerecon/cameras.hpp"
#include "wirerecon/error.hpp"
#include "wirerecon/io.hpp"
#include "wirerecon/metrics.hpp"
#include "wirerecon/pchip.hpp"
#include "wirerecon/pipeline.hpp"
#include "wirerecon/quaternion.hpp"
#include "wirerecon/rod.hpp"
#include "wirerecon/spherical.hpp"
#include "wirerecon/stereo.hpp"
#include "wirerecon/types.hpp"
