#pragma once

#include "gqmu/error.hpp"
#include "gqmu/parallel.hpp"
#include "gqmu/tensor.hpp"
#include "gqmu/augment.hpp"
#include "gqmu/geometry.hpp"
#include "gqmu/quantum.hpp"
#include "gqmu/qdip.hpp"
#include "gqmu/prior.hpp"
#include "gqmu/solver.hpp"
#include "gqmu/protocol.hpp"
#include "gqmu/io.hpp"
