"""
Templates package for wavelab

Console summary templates, one .txt file per subcommand, filled with
str.format by the WaveLab orchestrator.
"""
