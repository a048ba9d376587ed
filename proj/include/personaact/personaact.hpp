// Copyright 2026 The personaact Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

// Everything except the HTTP pieces (external_policy.hpp,
// interview_service.hpp, cli.hpp), which pull in cpp-httplib.

#pragma once

#include "personaact/audit.hpp"
#include "personaact/distribution.hpp"
#include "personaact/error.hpp"
#include "personaact/features.hpp"
#include "personaact/interview.hpp"
#include "personaact/io.hpp"
#include "personaact/metrics.hpp"
#include "personaact/persona.hpp"
#include "personaact/policy.hpp"
#include "personaact/policy_wire.hpp"
#include "personaact/quantile.hpp"
#include "personaact/random.hpp"
#include "personaact/recsim.hpp"
#include "personaact/synthetic.hpp"
#include "personaact/trace.hpp"
