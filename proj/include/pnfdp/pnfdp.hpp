// Copyright 2026 The pnfdp Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     https://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

// Umbrella header for the pairwise network f-DP library.

#ifndef PNFDP_PNFDP_HPP_
#define PNFDP_PNFDP_HPP_

#include "pnfdp/accountant.hpp"
#include "pnfdp/amplification.hpp"
#include "pnfdp/composition_count.hpp"
#include "pnfdp/graph_markov.hpp"
#include "pnfdp/graphs.hpp"
#include "pnfdp/io.hpp"
#include "pnfdp/normal.hpp"
#include "pnfdp/prv.hpp"
#include "pnfdp/rdp.hpp"
#include "pnfdp/secldp.hpp"
#include "pnfdp/sim.hpp"
#include "pnfdp/status.hpp"
#include "pnfdp/tradeoff.hpp"

#endif  // PNFDP_PNFDP_HPP_
