#pragma once

#include "visr/agent.hpp"
#include "visr/dumps.hpp"
#include "visr/env.hpp"
#include "visr/error.hpp"
#include "visr/geometry.hpp"
#include "visr/inference.hpp"
#include "visr/io.hpp"
#include "visr/nn.hpp"
#include "visr/rng.hpp"
#include "visr/trainer.hpp"
