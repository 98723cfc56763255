"""
Domain services: parsing, decomposition, training, evaluation and explanation.
"""
