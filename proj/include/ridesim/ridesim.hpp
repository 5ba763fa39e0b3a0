// Copyright 2026 The ridesim Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef RIDESIM_RIDESIM_HPP_
#define RIDESIM_RIDESIM_HPP_

#include "ridesim/agent.hpp"
#include "ridesim/common.hpp"
#include "ridesim/config.hpp"
#include "ridesim/demonstrations.hpp"
#include "ridesim/distributions.hpp"
#include "ridesim/driver.hpp"
#include "ridesim/metrics.hpp"
#include "ridesim/model.hpp"
#include "ridesim/nn.hpp"
#include "ridesim/observation.hpp"
#include "ridesim/pipeline.hpp"
#include "ridesim/platform.hpp"
#include "ridesim/ridegen.hpp"
#include "ridesim/sim.hpp"
#include "ridesim/synthetic.hpp"
#include "ridesim/training.hpp"
#include "ridesim/trip_log.hpp"

#endif  // RIDESIM_RIDESIM_HPP_
