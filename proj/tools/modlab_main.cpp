/*
 * Copyright (c) 2026 The modlab authors
 * Licensed under the Apache License, Version 2.0.
 */
#include "modlab/expcli.hpp"

int main(int argc, char** argv) { return modlab::cli_main(argc, argv); }
