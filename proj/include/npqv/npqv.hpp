#pragma once

#include "npqv/adversary.hpp"
#include "npqv/errors.hpp"
#include "npqv/experiments.hpp"
#include "npqv/io.hpp"
#include "npqv/photonics.hpp"
#include "npqv/protocol.hpp"
#include "npqv/rng.hpp"
#include "npqv/satgen.hpp"
