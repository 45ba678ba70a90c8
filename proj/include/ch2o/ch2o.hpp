// Copyright (c) 2026 The ch2o-exec Authors.
// Distributed under the MIT license that can be found in the LICENSE file.

#pragma once

#include "ch2o/sepalg.hpp"
#include "ch2o/perm.hpp"
#include "ch2o/ctypes.hpp"
#include "ch2o/memplace.hpp"
#include "ch2o/memtree.hpp"
#include "ch2o/cvalue.hpp"
#include "ch2o/cmem.hpp"
#include "ch2o/memsep.hpp"
#include "ch2o/refine.hpp"
#include "ch2o/render.hpp"
#include "ch2o/generate.hpp"
#include "ch2o/suites.hpp"
#include "ch2o/script.hpp"
