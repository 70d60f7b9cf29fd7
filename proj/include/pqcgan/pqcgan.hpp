#pragma once

#include "pqcgan/circuit.hpp"
#include "pqcgan/dataset.hpp"
#include "pqcgan/discriminator.hpp"
#include "pqcgan/errors.hpp"
#include "pqcgan/generator.hpp"
#include "pqcgan/linalg.hpp"
#include "pqcgan/metrics.hpp"
#include "pqcgan/noise.hpp"
#include "pqcgan/rng.hpp"
#include "pqcgan/state.hpp"
#include "pqcgan/training.hpp"
