#pragma once

#include "infotree/approx.hpp"
#include "infotree/data_io.hpp"
#include "infotree/dataset.hpp"
#include "infotree/estimators.hpp"
#include "infotree/experiments.hpp"
#include "infotree/graphical.hpp"
#include "infotree/histogram.hpp"
#include "infotree/parallel.hpp"
#include "infotree/rng.hpp"
#include "infotree/tan.hpp"
