#pragma once

#include "lrdseg/defaults.hpp"
#include "lrdseg/error.hpp"
#include "lrdseg/io.hpp"
#include "lrdseg/montecarlo.hpp"
#include "lrdseg/parallel.hpp"
#include "lrdseg/segmentation.hpp"
#include "lrdseg/spectral.hpp"
#include "lrdseg/synthesis.hpp"
#include "lrdseg/whittle.hpp"
