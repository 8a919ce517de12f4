#pragma once

#include "firmfold/dot.hpp"
#include "firmfold/engine.hpp"
#include "firmfold/error.hpp"
#include "firmfold/example.hpp"
#include "firmfold/graph.hpp"
#include "firmfold/gxl.hpp"
#include "firmfold/interpreter.hpp"
#include "firmfold/isomorphism.hpp"
#include "firmfold/ruleset.hpp"
#include "firmfold/verifier.hpp"
