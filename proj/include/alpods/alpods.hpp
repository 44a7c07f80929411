#pragma once

#include "commands.hpp"
#include "csv.hpp"
#include "dag.hpp"
#include "datasets.hpp"
#include "density.hpp"
#include "descriptions.hpp"
#include "error.hpp"
#include "evaluation.hpp"
#include "event_table.hpp"
#include "fuzzy.hpp"
#include "interval.hpp"
#include "model.hpp"
#include "parallel.hpp"
#include "random.hpp"
#include "synthetic.hpp"
#include "vispanel.hpp"
