#pragma once

#include "model.hpp"
#include "topology.hpp"
#include "pushdown.hpp"
#include "phase.hpp"
#include "mutex.hpp"
#include "eager.hpp"
#include "oracle.hpp"
#include "bounded.hpp"
#include "io.hpp"
