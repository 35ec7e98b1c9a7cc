#pragma once

#include "kernelgauge/errors.hpp"
#include "kernelgauge/numerics.hpp"
#include "kernelgauge/domain.hpp"
#include "kernelgauge/potential.hpp"
#include "kernelgauge/weights.hpp"
#include "kernelgauge/kernels.hpp"
#include "kernelgauge/gfunctional.hpp"
#include "kernelgauge/verifier.hpp"
#include "kernelgauge/oracles.hpp"
#include "kernelgauge/scenario.hpp"
