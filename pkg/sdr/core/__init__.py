# Core numerical and configuration modules
