// Copyright (C) 2026 the vattn authors
// SPDX-License-Identifier: Apache-2.0
//

#pragma once

#include "vattn/attention.hpp"
#include "vattn/budget.hpp"
#include "vattn/csv.hpp"
#include "vattn/errors.hpp"
#include "vattn/guarantee.hpp"
#include "vattn/harness.hpp"
#include "vattn/io.hpp"
#include "vattn/kv_cache.hpp"
#include "vattn/matrix.hpp"
#include "vattn/rng.hpp"
#include "vattn/selection.hpp"
#include "vattn/selectors.hpp"
#include "vattn/workload.hpp"
