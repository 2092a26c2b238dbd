#pragma once

#include "dataflow.hpp"
#include "errors.hpp"
#include "execution.hpp"
#include "graph.hpp"
#include "io.hpp"
#include "metrics.hpp"
#include "pregel.hpp"
#include "random.hpp"
#include "random_walk.hpp"
#include "sampling.hpp"
