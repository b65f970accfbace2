#pragma once

#include "matwaring/core.hpp"
#include "matwaring/freealg.hpp"
#include "matwaring/linalg.hpp"
#include "matwaring/block_triangular.hpp"
#include "matwaring/canon.hpp"
#include "matwaring/unitaries.hpp"
#include "matwaring/decompose.hpp"
#include "matwaring/json_io.hpp"
#include "matwaring/certificate_json.hpp"
#include "matwaring/verify.hpp"
#include "matwaring/cli.hpp"
