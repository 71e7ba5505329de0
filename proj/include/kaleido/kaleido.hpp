#pragma once

#include "kaleido/core.hpp"
#include "kaleido/prompt_codec.hpp"
#include "kaleido/backend.hpp"
#include "kaleido/remote_backend.hpp"
#include "kaleido/textsim.hpp"
#include "kaleido/pipeline.hpp"
#include "kaleido/decision.hpp"
#include "kaleido/dataset.hpp"
#include "kaleido/tuner.hpp"
#include "kaleido/ethics.hpp"
#include "kaleido/evalkit.hpp"
#include "kaleido/service.hpp"
