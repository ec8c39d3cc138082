#pragma once

#define FLAMEKIT_VERSION "1.0.0"
