#pragma once

#include "stit/calculus.hpp"
#include "stit/disjoint_sets.hpp"
#include "stit/formula.hpp"
#include "stit/kripke.hpp"
#include "stit/logic_spec.hpp"
#include "stit/oracle.hpp"
#include "stit/prover.hpp"
#include "stit/sequent.hpp"
#include "stit/taxonomy.hpp"
