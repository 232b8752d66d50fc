"""
Soliton Lab – steady gradient Ricci soliton numerics
"""
