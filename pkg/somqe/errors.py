#!/usr/bin/python3

class SomqeException(Exception):
    "Base for everything somqe raises on purpose."
    exit_code = 1

class ConfigurationError(SomqeException):
    "Parameters that cannot describe a valid map, series or run."
    exit_code = 3

class InputError(SomqeException):
    "Data that does not fit the operation (dimensions, empty sets, sizes)."
    exit_code = 3

class FormatError(SomqeException):
    "Image or manifest files we cannot read."
    exit_code = 4
