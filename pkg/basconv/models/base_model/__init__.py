from .base_model import BaseRecommender
