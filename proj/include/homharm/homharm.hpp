// Umbrella header for the whole library.
#pragma once

#include "homharm/checks.hpp"
#include "homharm/field_types.hpp"
#include "homharm/fields.hpp"
#include "homharm/groups.hpp"
#include "homharm/harmonics.hpp"
#include "homharm/io.hpp"
#include "homharm/nonlin.hpp"
#include "homharm/quadrature.hpp"
#include "homharm/report.hpp"
#include "homharm/se_kernels.hpp"
#include "homharm/spectral_conv.hpp"
#include "homharm/transforms.hpp"
