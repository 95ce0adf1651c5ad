from .anonymize_microdata import AnonymizeMicrodata
