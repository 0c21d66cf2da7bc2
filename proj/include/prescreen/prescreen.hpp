#pragma once

#include "prescreen/boxplot.hpp"
#include "prescreen/config.hpp"
#include "prescreen/csv.hpp"
#include "prescreen/dataset.hpp"
#include "prescreen/error.hpp"
#include "prescreen/harness.hpp"
#include "prescreen/models/classifier.hpp"
#include "prescreen/nnet.hpp"
#include "prescreen/parallel.hpp"
#include "prescreen/rng.hpp"
#include "prescreen/select.hpp"
#include "prescreen/stats.hpp"
