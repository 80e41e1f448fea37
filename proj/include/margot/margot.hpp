#pragma once

#include "distances.hpp"
#include "errors.hpp"
#include "exact.hpp"
#include "experiments.hpp"
#include "fundamental.hpp"
#include "graph.hpp"
#include "hitting.hpp"
#include "io.hpp"
#include "killing.hpp"
#include "regular.hpp"
#include "scaling.hpp"
#include "solution.hpp"
#include "types.hpp"
