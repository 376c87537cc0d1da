#pragma once

#include "action.hpp"
#include "builder.hpp"
#include "error.hpp"
#include "island_elem.hpp"
#include "island_kit.hpp"
#include "linalg.hpp"
#include "package.hpp"
#include "package_io.hpp"
#include "random.hpp"
#include "runtime.hpp"
#include "shortener.hpp"
#include "word.hpp"
#include "word_io.hpp"
