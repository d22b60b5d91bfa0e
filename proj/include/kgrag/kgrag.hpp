#pragma once

// Offline core. The HTTP clients live in remote_embedder.hpp and http_llm.hpp.

#include "kgrag/dataset.hpp"
#include "kgrag/embed.hpp"
#include "kgrag/error.hpp"
#include "kgrag/harness.hpp"
#include "kgrag/index.hpp"
#include "kgrag/kg.hpp"
#include "kgrag/llm.hpp"
#include "kgrag/metrics.hpp"
#include "kgrag/pipeline.hpp"
