#pragma once

// Umbrella header: the whole library.

#include "bnsl/bde.hpp"
#include "bnsl/csv.hpp"
#include "bnsl/dag.hpp"
#include "bnsl/dataset.hpp"
#include "bnsl/error.hpp"
#include "bnsl/eval.hpp"
#include "bnsl/evaluator.hpp"
#include "bnsl/local_structure.hpp"
#include "bnsl/localfit.hpp"
#include "bnsl/mdl.hpp"
#include "bnsl/netio.hpp"
#include "bnsl/network.hpp"
#include "bnsl/rng.hpp"
#include "bnsl/sampling.hpp"
#include "bnsl/search.hpp"
#include "bnsl/tsv.hpp"
#include "bnsl/variables.hpp"
