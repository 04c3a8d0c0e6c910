#pragma once

#include "mgbeam/baselines.hpp"
#include "mgbeam/bench.hpp"
#include "mgbeam/cm.hpp"
#include "mgbeam/error.hpp"
#include "mgbeam/json_io.hpp"
#include "mgbeam/linalg.hpp"
#include "mgbeam/model.hpp"
#include "mgbeam/pagd.hpp"
#include "mgbeam/structures.hpp"
#include "mgbeam/surrogate.hpp"
